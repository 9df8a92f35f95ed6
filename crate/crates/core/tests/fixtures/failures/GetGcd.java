import java.io.*;
import java.lang.*;
import java.util.*;
import java.math.*;

class GetGcd {

    //@ requires arr != null && arr.length > 0;
    //@ ensures (\forall int i; 0 <= i && i < arr.length; arr[i] >= 0);
    //@ ensures (\forall int i; 0 <= i && i < arr.length; \result <= arr[i]);
    //@ ensures (\exists int i; 0 <= i && i < arr.length; \result == arr[i]);
    public static int getGcd(int[] arr) {
        int result = 0;
        int min = arr[0];
        //@ maintaining 0 <= i && i <= arr.length;
        //@ maintaining (\forall int j; 0 <= j && j < i; arr[j] >= 0);
        //@ maintaining result <= min;
        //@ maintaining (\exists int j; 0 <= j && j < i; result == arr[j]);
        for (int i = 1; i < arr.length; i++) {
            if (arr[i] > min) {
                result = result > min ? result : min;
            } else {
                min = arr[i];
            }
        }
        return result;
    }
}
