class SwapArray {
    
    //@ requires newArray!= null && 0 <= newArray.length < Integer.MAX_VALUE;
    //@ ensures \old(newArray.length) == 0 ==> newArray.length == 0;
    //@ ensures \old(newArray.length) > 0 ==> newArray[0] == \old(newArray[\old(newArray.length)-1]);
    //@ ensures \old(newArray.length) > 0 ==> newArray[\old(newArray.length)-1] == \old(newArray[0]);
    public static int[] swapArray(int[] newArray) {
        if (newArray.length == 0) {
            return newArray;
        }
        int first = newArray[0];
        int last = newArray[newArray.length - 1];
        newArray[0] = last;
        newArray[newArray.length - 1] = first;
        return newArray;
    }
}
